"""Feature packages; each command lives next to the feature it drives."""
