# Test module for config-related functionality