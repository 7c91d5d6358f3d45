"""Kakutani-Rohlin towers and tower surgery"""
