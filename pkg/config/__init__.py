"""
Configuration Package for the Kleinian Group Toolkit
"""
