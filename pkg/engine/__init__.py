# Engine Package
