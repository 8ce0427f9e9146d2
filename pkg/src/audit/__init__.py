# audit package
