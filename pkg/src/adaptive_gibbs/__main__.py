from adaptive_gibbs.cli import main

raise SystemExit(main())
