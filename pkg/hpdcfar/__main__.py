from hpdcfar.cli import main

raise SystemExit(main())
