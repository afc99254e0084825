import sys

from linkfold.main import main

sys.exit(main())
