"""Tiles, wave packets, trees and the size/energy calculus."""
