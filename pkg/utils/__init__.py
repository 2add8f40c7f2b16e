# Utils Package
