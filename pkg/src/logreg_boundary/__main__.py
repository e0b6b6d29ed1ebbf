import sys

from .cli_report import main


sys.exit(main())
