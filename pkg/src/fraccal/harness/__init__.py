"""Configuration, experiment runners and output for reproduction runs."""
