"""Command line surface: config, subcommand handlers and run artifacts."""
