"""Symbolic factors, inverse limits and Bratteli diagrams"""
