"""DDPG package - off-policy actor-critic learner and exploration noise"""
