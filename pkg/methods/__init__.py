# kNN methods package
