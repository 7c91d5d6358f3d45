"""Experiment configs, report IO and the command runner"""
