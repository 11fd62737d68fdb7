"""Numerical inverse scattering for the Gerdzhikov-Ivanov derivative NLS equation."""
