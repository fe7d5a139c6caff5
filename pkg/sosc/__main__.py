from sosc.cli import main

raise SystemExit(main())
