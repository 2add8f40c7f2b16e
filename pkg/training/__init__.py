# Training Package
