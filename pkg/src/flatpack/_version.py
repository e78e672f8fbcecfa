__version__ = "0.1.0"
ENGINE = f"flatpack {__version__}"
