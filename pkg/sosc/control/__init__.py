# User value: This package turns a learned skill into motion: predictions, shared control and trajectory tracking.
