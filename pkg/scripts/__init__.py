# Initialize scripts package
