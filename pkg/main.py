from cli import main
import sys

# see cli.py for subcommands, e.g. `python main.py table 7 18`
if __name__ == "__main__":
    sys.exit(main())
