"""ERL package - hybrid evolutionary / gradient training loop"""
