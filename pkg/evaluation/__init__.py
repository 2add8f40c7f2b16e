# Evaluation Package
