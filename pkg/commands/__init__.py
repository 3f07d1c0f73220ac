from commands import drift, finite, kernels, rates, validate

__all__ = ["drift", "finite", "kernels", "rates", "validate"]
