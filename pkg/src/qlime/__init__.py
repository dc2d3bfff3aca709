"""Local surrogate explanations and regions of indecision for a simulated quantum classifier."""
