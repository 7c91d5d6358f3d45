"""Database module for the towerforge run ledger"""
