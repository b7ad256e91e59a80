"""Shared Rich Console instance for log output."""

from rich.console import Console

# Single console on stderr so stdout carries nothing but the requested report
# and can be piped or redirected safely.
console = Console(stderr=True)
