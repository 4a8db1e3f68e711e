"""The science layer: model, kernels, phase space, entropies, closed forms, numerics."""
