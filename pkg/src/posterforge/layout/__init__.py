"""Column layout, text measurement and balancing."""
