"""Adaptation-manager generation: prompts, backends, the feedback loop and experiments"""
