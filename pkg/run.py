import sys

from src.logreg_boundary import main

if __name__ == '__main__':
    sys.exit(main())
