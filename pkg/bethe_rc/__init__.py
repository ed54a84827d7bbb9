# Bethe ansatz solutions and rigged configurations for the spin-1/2 XXX chain
__version__ = "0.1.0"
