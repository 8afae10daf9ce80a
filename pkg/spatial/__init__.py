# Spatial indexes package
