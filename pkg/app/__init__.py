"""IRS 보조 MISO 시뮬레이터를 구성하는 모듈들"""
