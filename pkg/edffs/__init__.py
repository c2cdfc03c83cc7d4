"""edffs: power-capped dynamic flexible flow shop scheduling with a hybrid GA."""

__version__ = "0.1.0"
