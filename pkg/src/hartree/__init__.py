"""Radial numerics for coupled critical Hartree systems."""
