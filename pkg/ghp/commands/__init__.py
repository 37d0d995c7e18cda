"""Command modules assembled by `ghp.main`."""
