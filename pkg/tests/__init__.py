"""
单元测试包
"""
