# cli: experiment runner, config files and result writers
