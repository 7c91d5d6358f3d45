"""Uniform partitions built by renaming or copying fiber names"""
