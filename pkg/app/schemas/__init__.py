"""설정과 결과 레코드를 정의하는 pydantic 스키마 모듈"""
