"""Beating the random assignment on bounded-degree constraint satisfaction problems."""
