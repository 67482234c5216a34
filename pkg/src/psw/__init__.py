"""Tree-partitions, strong products and the G_h lower-bound machinery."""
