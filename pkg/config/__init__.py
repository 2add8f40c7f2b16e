# Configuration Package
