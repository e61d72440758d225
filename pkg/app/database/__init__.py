# This file makes the database directory a Python package
