# This file makes pra_radar a Python package

__version__ = "1.0.0"
