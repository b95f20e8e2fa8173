# tests for the paraqed solver
