"""Finite partitions, names and block statistics"""
