# Metrics Package
