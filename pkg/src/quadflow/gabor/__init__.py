"""Gaussian wave packets, Gabor matrices and the decay/Schur harness."""
