from src.engine.tensor import GradTape, Tensor, forward_op, grad

__all__ = ["GradTape", "Tensor", "forward_op", "grad"]
