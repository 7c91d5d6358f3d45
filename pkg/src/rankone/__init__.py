"""Rank-one cutting-and-stacking systems"""
