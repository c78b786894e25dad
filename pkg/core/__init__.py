"""
Core package of the region editor: configuration, logging, region geometry,
the sequence model, the data pipeline and the experiment driver.
"""
