"""
Command handlers for the wrench grammar CLI.

Each subcommand (synth, calibrate, encode, train, predict, eval, plot,
info) has its own module exposing ``handle_<name>(args) -> int``.
"""
