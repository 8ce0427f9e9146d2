# network package
