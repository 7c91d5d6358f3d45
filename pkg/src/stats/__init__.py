"""Ergodic statistics: Birkhoff sums, uniformity tests and Radon estimates"""
