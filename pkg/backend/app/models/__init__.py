"""Data models shared by services and interfaces."""
