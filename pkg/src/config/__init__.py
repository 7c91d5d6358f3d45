"""Configuration module for towerforge"""
