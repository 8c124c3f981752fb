"""Curricula of frozen teammates for Independent DQN in a two-agent soup kitchen."""

__version__ = "0.1.0"
