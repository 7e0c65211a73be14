"""Запуск через ``python -m pukauth``."""

import sys

from pukauth.main import main

if __name__ == "__main__":
    sys.exit(main())
