"""Command-line front end: run configuration, check reports and the kura commands."""
