# -*- coding: utf-8 -*-

""" MAIN ENTRY POINT FOR MALAB CLI
Routes `malab <command> [options]` to the registered command and exits
with its status.
"""

import sys

from malab.cli import (
    MALabCLI
)

def main():
    """
    Build the CLI, run the command named in sys.argv and exit with its
    status (0 pass, 1 experiment fail, 2 error).
    """

    cli = MALabCLI()
    sys.exit(cli.execute_from_command_line())

if __name__ == "__main__":
    main()
