"""Command-line driver: scatter, evolve, fsm, compare, soliton-exact.

Exit codes: 0 success, 1 usage error, 2 numerical failure. Every numeric
option can also come from a flat key=value file given with --config;
flags on the command line take precedence.
"""

import argparse
import csv
import json
import sys

import numpy as np

from . import deform as df
from . import fsm
from . import phase as ph
from . import potentials as pots
from . import rhp
from .scattering import ScatterConfig, ScatteringData, ScatteringError, scattering_data


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# name -> (type, default); None defaults fall back to the library defaults
OPTIONS = {
    "n1": (int, None),
    "a_hat": (float, None),
    "n1_r": (int, None),
    "c1": (float, 4.0),
    "arm_slope": (float, 0.1),
    "epsilon": (float, None),
    "n_per_arc": (int, 24),
    "n_max": (int, 96),
    "t_threshold": (float, 2.0),
    "undeformed": (bool, False),
    "L": (float, 40.0),
    "N": (int, 1024),
    "dt": (float, 1e-4),
    "dealias": (bool, False),
    "t_end": (float, 1.0),
    "xi": (float, 1.0),
    "eta": (float, 0.5),
}


def _nums(*vals):
    # repr(float) round-trips exactly; numpy scalars would print as np.float64(...)
    return [repr(float(v)) for v in vals]


def _bool(s):
    v = str(s).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean, got %r" % s)


def read_config(path):
    """Flat key=value file; '#' starts a comment; keys may use - or _."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError("%s:%d: expected key=value" % (path, lineno))
            key, val = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in OPTIONS:
                raise UsageError("%s:%d: unknown key %r" % (path, lineno, key))
            typ = OPTIONS[key][0]
            try:
                out[key] = _bool(val) if typ is bool else typ(val)
            except ValueError:
                raise UsageError("%s:%d: bad value for %s: %r" % (path, lineno, key, val))
    return out


def parse_grid(spec, name):
    """'a:b:n' (n points from a to b) or a comma-separated list."""
    try:
        if ":" in spec:
            a, b, n = spec.split(":")
            n = int(n)
            if n < 1:
                raise ValueError
            return np.linspace(float(a), float(b), n)
        return np.array([float(v) for v in spec.split(",")])
    except ValueError:
        raise UsageError("--%s: cannot parse grid %r (use a:b:n or a,b,c)" % (name, spec))


def resolve_profile(name):
    if name.startswith("file:"):
        path = name[5:]
        try:
            rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        except (OSError, ValueError) as e:
            raise UsageError("cannot read profile file %s: %s" % (path, e))
        if rows.shape[1] < 3:
            raise UsageError("profile file needs columns x, re_q, im_q")
        return pots.from_samples(rows[:, 0], rows[:, 1] + 1j * rows[:, 2], label=path)
    try:
        return pots.builtin(name)
    except (KeyError, ValueError):
        raise UsageError("unknown profile %r (q_kn, q_gi, gauss:A, gauss_sech, zero, file:PATH)"
                         % name)


def _add_option(p, name, help_text):
    flag = "--" + name.replace("_", "-")
    typ = OPTIONS[name][0]
    if typ is bool:
        p.add_argument(flag, dest=name, action="store_const", const=True, default=None,
                       help=help_text)
    else:
        p.add_argument(flag, dest=name, type=typ, default=None, help=help_text)


def build_parser():
    p = _Parser(prog="dnls-nist", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="key=value file with option defaults")
    sub = p.add_subparsers(dest="cmd", parser_class=_Parser)

    s = sub.add_parser("scatter", help="compute and save scattering data")
    s.add_argument("profile")
    _add_option(s, "n1", "collocation points for the eigenvalue problem")
    _add_option(s, "a_hat", "scale of the tanh map")
    _add_option(s, "n1_r", "collocation points for the Jost solves")
    s.add_argument("--out", default="scattering.json")

    e = sub.add_parser("evolve", help="solve the inverse problem at (x, t) points")
    e.add_argument("data", help="scattering data JSON")
    e.add_argument("--x", default="0", help="grid a:b:n or list")
    e.add_argument("--t", default="1", help="grid a:b:n or list")
    for name, h in (("c1", "region 1 bound on |x|/t"), ("arm_slope", "tan of the lens angle"),
                    ("epsilon", "soliton circle radius"), ("n_per_arc", "collocation points"),
                    ("n_max", "cap for n-doubling"), ("t_threshold", "time at which B is removed"),
                    ("undeformed", "solve the undeformed problem at every t")):
        _add_option(e, name, h)
    e.add_argument("--dump-rhp", dest="dump_rhp", help="write the contour of the first point")
    e.add_argument("--out", default="field.csv")

    f = sub.add_parser("fsm", help="Fourier reference run")
    f.add_argument("profile")
    for name, h in (("L", "half-width of the periodic box"), ("N", "grid points"),
                    ("dt", "time step"), ("dealias", "apply the 2/3 rule"),
                    ("t_end", "final time")):
        _add_option(f, name, h)
    f.add_argument("--snapshots", default=None, help="times to record (default t_end)")
    f.add_argument("--out", default="fsm.csv")

    c = sub.add_parser("compare", help="pointwise |q_nist - q_fsm|")
    c.add_argument("data")
    c.add_argument("profile")
    c.add_argument("--x", default="-10:10:21")
    c.add_argument("--t", default="0.5,1,1.5")
    for name in ("c1", "arm_slope", "epsilon", "n_per_arc", "n_max", "t_threshold",
                 "L", "N", "dt", "dealias"):
        _add_option(c, name, None)
    c.add_argument("--out", default="compare.csv")

    q = sub.add_parser("soliton-exact", help="exact one-soliton values")
    _add_option(q, "xi", "real part of the eigenvalue")
    _add_option(q, "eta", "imaginary part of the eigenvalue")
    q.add_argument("--x", default="-5:5:11")
    q.add_argument("--t", default="0")
    q.add_argument("--out", default="soliton.csv")
    return p


def _merged(args, config):
    out = {}
    for name, (_, default) in OPTIONS.items():
        v = getattr(args, name, None)
        out[name] = v if v is not None else config.get(name, default)
    return out


def _validate(o):
    for name in ("n1", "n1_r", "n_per_arc", "n_max", "N"):
        if o[name] is not None and o[name] < 1:
            raise UsageError("--%s must be positive" % name.replace("_", "-"))
    for name in ("a_hat", "c1", "arm_slope", "dt", "L", "t_threshold"):
        if o[name] is not None and not o[name] > 0:
            raise UsageError("--%s must be positive" % name.replace("_", "-"))
    if o["arm_slope"] >= 1:
        raise UsageError("--arm-slope must be below 1")
    if o["epsilon"] is not None and not o["epsilon"] > 0:
        raise UsageError("--epsilon must be positive")
    if o["n_per_arc"] < 8:
        raise UsageError("--n-per-arc must be at least 8")
    if o["n1"] is not None and o["n1"] < 16:
        raise UsageError("--n1 must be at least 16")
    if o["N"] < 64 or o["N"] & (o["N"] - 1):
        raise UsageError("--N must be a power of two, at least 64")


def _deform_cfg(o):
    return df.DeformConfig(c1=o["c1"], arm_slope=o["arm_slope"], epsilon=o["epsilon"],
                           t_threshold=o["t_threshold"], undeformed=bool(o["undeformed"]))


def _solver_cfg(o):
    return rhp.SolverConfig(n_per_arc=o["n_per_arc"], n_max=max(o["n_max"], o["n_per_arc"]))


def _fsm_cfg(o):
    return fsm.FsmConfig(L=o["L"], N=o["N"], dt=o["dt"], dealias=bool(o["dealias"]))


def _load_data(path):
    try:
        sd = ScatteringData.load(path)
    except OSError as e:
        raise UsageError("cannot read %s: %s" % (path, e))
    except (ValueError, KeyError, TypeError) as e:
        raise ScatteringError("corrupt-scattering-data in %s: %s" % (path, e))
    sd.validate()
    return sd


def cmd_scatter(args, o):
    pot = resolve_profile(args.profile)
    kw = {}
    if o["n1"] is not None:
        kw["n1_eig"] = o["n1"]
    if o["a_hat"] is not None:
        kw["a_hat"] = o["a_hat"]
    if o["n1_r"] is not None:
        kw["n1_r"] = o["n1_r"]
    sd = scattering_data(pot, ScatterConfig(**kw))
    sd.save(args.out)
    print("profile %s (variant %d): %d quartet(s), reflectionless=%s"
          % (pot.label, pot.variant, len(sd.quartets), bool(sd.reflectionless)))
    print("%-26s %-26s %-10s" % ("kappa", "C", "residual"))
    for qt, C in zip(sd.quartets, sd.norming):
        print("%-26s %-26s %.2e" % ("%.15f%+.15fi" % (qt.kappa.real, qt.kappa.imag),
                                    "%.10f%+.10fi" % (C.real, C.imag), qt.residual))
        print("  quartet: " + ", ".join("%.6f%+.6fi" % (m.real, m.imag) for m in qt.members))
    print("wrote %s" % args.out)
    return 0


def cmd_evolve(args, o):
    sd = _load_data(args.data)
    xs, ts = parse_grid(args.x, "x"), parse_grid(args.t, "t")
    if np.any(ts < 0):
        raise UsageError("--t must be non-negative")
    dcfg, scfg = _deform_cfg(o), _solver_cfg(o)
    if args.dump_rhp:
        prob = df.build_rhp(sd, ph.PhaseParams(float(xs[0]), float(ts[0])), dcfg)
        with open(args.dump_rhp, "w") as fh:
            json.dump(prob.to_dict(), fh, indent=1)
    pts = [(x, t) for t in ts for x in xs]
    samples = rhp.evolve(sd, pts, dcfg, scfg)
    rhp.write_samples(samples, args.out)
    bad = [s for s in samples if not s.ok]
    print("wrote %d samples to %s" % (len(samples), args.out))
    if bad:
        print("%d point(s) failed:" % len(bad))
        for s in bad:
            print("  x=%g t=%g: %s" % (s.x, s.t, s.error))
        return 2
    return 0


def cmd_fsm(args, o):
    pot = resolve_profile(args.profile)
    cfg = _fsm_cfg(o)
    t_end = o["t_end"]
    if t_end < 0:
        raise UsageError("--t-end must be non-negative")
    snaps = parse_grid(args.snapshots, "snapshots") if args.snapshots else np.array([t_end])
    if np.any(snaps < 0) or np.any(snaps > t_end + 1e-12):
        raise UsageError("--snapshots must lie in [0, t_end]")
    final, states = fsm.fsm_evolve(pot, cfg, t_end, snapshots=tuple(snaps))
    fsm.write_snapshots(states, cfg, args.out)
    m0 = fsm.FsmState(0.0, pot(cfg.x)).mass(cfg)
    print("t_end=%g steps=%d mass drift=%.2e; wrote %s"
          % (final.t, int(round(t_end / cfg.dt)), abs(final.mass(cfg) - m0) / max(m0, 1e-300),
             args.out))
    return 0


def cmd_compare(args, o):
    sd = _load_data(args.data)
    pot = resolve_profile(args.profile)
    xs, ts = parse_grid(args.x, "x"), parse_grid(args.t, "t")
    cfg = _fsm_cfg(o)
    if np.any(np.abs(xs) >= cfg.L):
        raise UsageError("--x must lie inside the FSM box (-L, L)")
    if np.any(ts < 0):
        raise UsageError("--t must be non-negative")
    ts = np.sort(ts)
    _, states = fsm.fsm_evolve(pot, cfg, float(ts[-1]), snapshots=tuple(ts))
    dcfg, scfg = _deform_cfg(o), _solver_cfg(o)
    failed = False
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "t", "re_q_nist", "im_q_nist", "re_q_fsm", "im_q_fsm", "error"])
        for st in states:
            qf = fsm.interpolate(st, cfg, xs)
            errs = []
            for s, qq in zip(rhp.evolve(sd, [(x, st.t) for x in xs], dcfg, scfg), qf):
                err = abs(s.q - qq)
                failed |= not s.ok
                errs.append(err)
                w.writerow(_nums(s.x, st.t, s.q.real, s.q.imag, qq.real, qq.imag, err))
            print("t=%g sup|q_nist - q_fsm| = %.3e" % (st.t, np.nanmax(errs)))
    print("wrote %s" % args.out)
    return 2 if failed else 0


def cmd_soliton_exact(args, o):
    xi, eta = o["xi"], o["eta"]
    if xi * eta == 0:
        raise UsageError("--xi and --eta must both be nonzero")
    xs, ts = parse_grid(args.x, "x"), parse_grid(args.t, "t")
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(rhp.CSV_FIELDS[:5])
        for t in ts:
            for x, q in zip(xs, pots.soliton_gi(xs, t, xi, eta)):
                w.writerow(_nums(x, t, q.real, q.imag, abs(q)))
    print("wrote %s" % args.out)
    return 0


COMMANDS = {"scatter": cmd_scatter, "evolve": cmd_evolve, "fsm": cmd_fsm,
            "compare": cmd_compare, "soliton-exact": cmd_soliton_exact}


GRID_FLAGS = ("--x", "--t", "--snapshots")


def _glue_grids(argv):
    """'--x -3:3:7' -> '--x=-3:3:7': argparse takes a leading '-' for an option."""
    out, it = [], iter(argv)
    for a in it:
        if a in GRID_FLAGS:
            a = a + "=" + next(it, "")
        out.append(a)
    return out


def main(argv=None):
    parser = build_parser()
    argv = _glue_grids(sys.argv[1:] if argv is None else list(argv))
    try:
        args = parser.parse_args(argv)
        if not args.cmd:
            parser.print_help()
            return 1
        config = read_config(args.config) if args.config else {}
        o = _merged(args, config)
        _validate(o)
        return COMMANDS[args.cmd](args, o)
    except UsageError as e:
        print("usage error: %s" % e, file=sys.stderr)
        return 1
    except (ScatteringError, df.DeformationError, rhp.SolverError, ph.ContourError,
            fsm.InstabilityError, np.linalg.LinAlgError) as e:
        print("numerical failure: %s" % e, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
