"""Prompt text for adaptation-manager generation"""
