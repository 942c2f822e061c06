"""Command line layer: parser, subcommands and exit codes."""
