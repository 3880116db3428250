class DegenerateDataError(ValueError):
    """Data too degenerate for a numerically meaningful estimate."""


class NonCausalError(ValueError):
    """AR coefficients whose characteristic polynomial has a root in the closed unit disk."""

    def __init__(self, phi, moduli):
        self.phi = tuple(phi)
        self.moduli = tuple(moduli)
        shown = ", ".join(f"{m:.6g}" for m in self.moduli)
        super().__init__(f"phi={list(self.phi)} is not causal; root moduli: {shown}")
