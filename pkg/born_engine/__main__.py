from born_engine.cli import main

main()
