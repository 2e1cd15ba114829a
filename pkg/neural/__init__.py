"""Neural package - flat-parameter networks, gradients and optimizers"""
