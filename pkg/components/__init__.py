"""
Output Components Package for the Kleinian Group Toolkit
"""
