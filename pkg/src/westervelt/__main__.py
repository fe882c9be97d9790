from westervelt.cli import main

raise SystemExit(main())
