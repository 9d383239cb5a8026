"""
Geometry Utilities Package for the Kleinian Group Toolkit
"""
