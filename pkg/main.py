import sys
import warnings
warnings.filterwarnings('ignore', message='Solution may be inaccurate')

from chainlab.cli.router import main

if __name__ == "__main__":
    sys.exit(main())
