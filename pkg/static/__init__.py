"""
Schemas and Example Inputs for the Kleinian Group Toolkit
"""
