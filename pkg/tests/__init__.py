# Test package for robust-linkage
