"""Data models module for towerforge"""
